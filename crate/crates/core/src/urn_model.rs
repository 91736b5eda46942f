//! Two urns and a fair coin: heads moves a uniform ball from A to B, tails a
//! uniform ball from B back to A, doing nothing when the source is empty.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::frag_coag_chain::{observation_index, Coin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UrnMove {
    ToB(usize),
    ToA(usize),
    Idle,
}

/// Balls `1..=n` split between urns A and B.
#[derive(Debug, Clone)]
pub struct UrnState {
    in_a: Vec<usize>,
    in_b: Vec<usize>,
    slot: Vec<usize>,
    step: u64,
}

impl UrnState {
    /// All `n` balls in A.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("urn needs at least one ball"));
        }
        let mut slot = vec![0; n + 1];
        for b in 1..=n {
            slot[b] = b - 1;
        }
        Ok(Self { in_a: (1..=n).collect(), in_b: Vec::new(), slot, step: 0 })
    }

    pub fn ball_count(&self) -> usize {
        self.in_a.len() + self.in_b.len()
    }

    pub fn count_b(&self) -> usize {
        self.in_b.len()
    }

    pub fn balls_in_b(&self) -> &[usize] {
        &self.in_b
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> UrnMove {
        let coin = if rng.random::<bool>() { Coin::Head } else { Coin::Tail };
        self.step_with_coin(coin, rng)
    }

    pub fn step_with_coin<R: Rng + ?Sized>(&mut self, coin: Coin, rng: &mut R) -> UrnMove {
        self.step += 1;
        match coin {
            Coin::Head if !self.in_a.is_empty() => {
                let ball = transfer(&mut self.in_a, &mut self.in_b, &mut self.slot, rng);
                UrnMove::ToB(ball)
            }
            Coin::Tail if !self.in_b.is_empty() => {
                let ball = transfer(&mut self.in_b, &mut self.in_a, &mut self.slot, rng);
                UrnMove::ToA(ball)
            }
            _ => UrnMove::Idle,
        }
    }

    pub fn run_until<R: Rng + ?Sized>(&mut self, k_target: u64, rng: &mut R) -> Result<()> {
        if k_target < self.step {
            return Err(invalid(format!("cannot run back from step {} to {k_target}", self.step)));
        }
        while self.step < k_target {
            self.step(rng);
        }
        Ok(())
    }
}

fn transfer<R: Rng + ?Sized>(from: &mut Vec<usize>, to: &mut Vec<usize>, slot: &mut [usize], rng: &mut R) -> usize {
    let idx = rng.random_range(0..from.len());
    let ball = from.swap_remove(idx);
    if idx < from.len() {
        slot[from[idx]] = idx;
    }
    slot[ball] = to.len();
    to.push(ball);
    ball
}

/// Number of balls in B after `floor(t n)` steps of a fresh urn.
pub fn urn_count_at<R: Rng + ?Sized>(n: usize, t: f64, rng: &mut R) -> Result<usize> {
    let k = observation_index(n, t, 0.0)?;
    let mut urn = UrnState::new(n)?;
    urn.run_until(k, rng)?;
    Ok(urn.count_b())
}

/// Outcome of one turnover run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Turnover {
    /// Balls in B at `floor(t n)`.
    pub count: usize,
    /// Fraction of those still in B at `floor(t n + s sqrt(n))`; 0 when
    /// `b_empty`.
    pub fraction: f64,
    pub b_empty: bool,
}

/// Runs a fresh urn to `floor(t n)`, then `s sqrt(n)` more rescaled steps,
/// and reports how many of the balls first seen in B stayed there.
pub fn urn_turnover<R: Rng + ?Sized>(n: usize, t: f64, s: f64, rng: &mut R) -> Result<Turnover> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid(format!("turnover horizon must be nonnegative, got {s}")));
    }
    let k0 = observation_index(n, t, 0.0)?;
    let k1 = observation_index(n, t, s)?;
    let mut urn = UrnState::new(n)?;
    urn.run_until(k0, rng)?;
    let seen: Vec<usize> = urn.balls_in_b().to_vec();
    let count = seen.len();
    if count == 0 {
        urn.run_until(k1, rng)?;
        return Ok(Turnover { count, fraction: 0.0, b_empty: true });
    }
    // A ball still in B sits at a valid slot of B holding itself.
    urn.run_until(k1, rng)?;
    let stayed = seen
        .iter()
        .filter(|&&b| urn.slot[b] < urn.in_b.len() && urn.in_b[urn.slot[b]] == b)
        .count();
    Ok(Turnover { count, fraction: stayed as f64 / count as f64, b_empty: false })
}
