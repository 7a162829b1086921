//! The elimination process itself, one stab at a time.
//!
//! Participants sit on a doubly linked ring indexed by their original label;
//! "right" is the direction of increasing labels. A step removes exactly one
//! participant in `O(1)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rule::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }
}

/// Outcome of one Bernoulli toss. `Heads` has probability `p` for the victim
/// coin and `q` for the R3 knife coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coin {
    Heads,
    Tails,
}

impl Coin {
    /// Maps a uniform 64-bit word to a toss: heads iff the top 53 bits, read
    /// as a fraction in `[0, 1)`, fall below `p`. So `p = 0` never and `p = 1`
    /// always gives heads.
    #[inline]
    pub fn from_bits(bits: u64, p: f64) -> Coin {
        let u = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < p {
            Coin::Heads
        } else {
            Coin::Tails
        }
    }
}

/// Live state of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessState {
    rule: Rule,
    next: Vec<u32>,
    prev: Vec<u32>,
    alive: Vec<bool>,
    alive_count: usize,
    knife: usize,
    direction: Direction,
}

impl ProcessState {
    /// `N` participants, knife at `0`, direction right.
    pub fn new(rule: Rule, n: usize) -> Result<Self> {
        let labels: Vec<usize> = (0..n).collect();
        Self::from_parts(rule, n, &labels, 0, Direction::Right)
    }

    /// A mid-game state over `n` original labels of which `alive` remain.
    pub fn from_parts(
        rule: Rule,
        n: usize,
        alive: &[usize],
        knife: usize,
        direction: Direction,
    ) -> Result<Self> {
        rule.validate()?;
        if n == 0 || n > u32::MAX as usize {
            return domain(format!("N = {n} out of range"));
        }
        if alive.is_empty() {
            return Err(Error::InvalidState("no participant alive".into()));
        }
        let mut is_alive = vec![false; n];
        for &label in alive {
            if label >= n || is_alive[label] {
                return Err(Error::InvalidState(format!(
                    "alive label {label} is out of range or repeated"
                )));
            }
            is_alive[label] = true;
        }
        if knife >= n || !is_alive[knife] {
            return Err(Error::InvalidState(format!("knife holder {knife} is not alive")));
        }
        let mut ring: Vec<usize> = alive.to_vec();
        ring.sort_unstable();
        let mut next = vec![0u32; n];
        let mut prev = vec![0u32; n];
        for (i, &label) in ring.iter().enumerate() {
            let after = ring[(i + 1) % ring.len()];
            next[label] = after as u32;
            prev[after] = label as u32;
        }
        Ok(ProcessState {
            rule,
            next,
            prev,
            alive: is_alive,
            alive_count: ring.len(),
            knife,
            direction,
        })
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn n_participants(&self) -> usize {
        self.next.len()
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn knife(&self) -> usize {
        self.knife
    }

    /// Current stabbing direction; only R1 ever changes it.
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_alive(&self, label: usize) -> bool {
        self.alive.get(label).copied().unwrap_or(false)
    }

    /// Alive labels in counterclockwise (increasing) order.
    pub fn alive(&self) -> Vec<usize> {
        (0..self.alive.len()).filter(|&l| self.alive[l]).collect()
    }

    /// Bit `l` set iff label `l` is alive. Needs `N <= 64`.
    pub fn alive_mask(&self) -> u64 {
        assert!(self.alive.len() <= 64, "alive_mask needs N <= 64");
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .fold(0u64, |m, (l, _)| m | (1 << l))
    }

    pub fn survivor(&self) -> Option<usize> {
        (self.alive_count == 1).then_some(self.knife)
    }

    #[inline]
    fn neighbour(&self, label: usize, dir: Direction) -> usize {
        match dir {
            Direction::Right => self.next[label] as usize,
            Direction::Left => self.prev[label] as usize,
        }
    }

    #[inline]
    fn unlink(&mut self, label: usize) {
        let (before, after) = (self.prev[label], self.next[label]);
        self.next[before as usize] = after;
        self.prev[after as usize] = before;
        self.alive[label] = false;
        self.alive_count -= 1;
    }

    /// Performs one elimination and returns the victim.
    ///
    /// `knife_coin` must be given for R3 and only for R3. With two
    /// participants left both neighbours coincide, so the holder always
    /// eliminates the other one.
    pub fn step(&mut self, victim_coin: Coin, knife_coin: Option<Coin>) -> Result<usize> {
        if self.alive_count < 2 {
            return Err(Error::InvalidState(
                "a step needs at least two participants alive".into(),
            ));
        }
        let is_r3 = matches!(self.rule, Rule::R3 { .. });
        if is_r3 != knife_coin.is_some() {
            return Err(Error::InvalidState(
                "a knife coin is required for R3 and only for R3".into(),
            ));
        }
        Ok(self.step_unchecked(victim_coin, knife_coin.unwrap_or(Coin::Heads)))
    }

    #[inline]
    fn step_unchecked(&mut self, victim_coin: Coin, knife_coin: Coin) -> usize {
        let holder = self.knife;
        let side = |c: Coin| match c {
            Coin::Heads => Direction::Right,
            Coin::Tails => Direction::Left,
        };
        match self.rule {
            Rule::Deterministic => {
                let victim = self.neighbour(holder, Direction::Right);
                self.unlink(victim);
                self.knife = self.neighbour(holder, Direction::Right);
                victim
            }
            Rule::R1 { .. } => {
                if victim_coin == Coin::Tails {
                    self.direction = self.direction.flipped();
                }
                let victim = self.neighbour(holder, self.direction);
                self.unlink(victim);
                self.knife = self.neighbour(holder, self.direction);
                victim
            }
            Rule::R2 { .. } => {
                let dir = side(victim_coin);
                let victim = self.neighbour(holder, dir);
                self.unlink(victim);
                self.knife = self.neighbour(holder, dir);
                victim
            }
            Rule::R3 { .. } => {
                let victim = self.neighbour(holder, side(victim_coin));
                self.unlink(victim);
                self.knife = self.neighbour(holder, side(knife_coin));
                victim
            }
        }
    }

    /// Plays the round to the end, drawing every toss from `next_bits`.
    /// Returns the survivor.
    pub fn run_with<F: FnMut() -> u64>(&mut self, mut next_bits: F) -> usize {
        let (p, q) = match self.rule {
            Rule::Deterministic => (1.0, 1.0),
            Rule::R1 { p } | Rule::R2 { p } => (p, 1.0),
            Rule::R3 { p, q } => (p, q),
        };
        let is_r3 = matches!(self.rule, Rule::R3 { .. });
        while self.alive_count > 1 {
            let victim_coin = Coin::from_bits(next_bits(), p);
            let knife_coin = if is_r3 {
                Coin::from_bits(next_bits(), q)
            } else {
                Coin::Heads
            };
            self.step_unchecked(victim_coin, knife_coin);
        }
        self.knife
    }
}
