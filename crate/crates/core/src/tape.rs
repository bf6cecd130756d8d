//! Pre-sampled reward tapes.
//!
//! Each arm owns `2T` i.i.d. cells. Pulls consume cells left to right, so two
//! runs built from the same `(instance, T, seed)` see the same rewards for the
//! same pull sequence.

use crate::instance::BanditInstance;
use crate::seeding::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct RewardTape {
    cells: Vec<Vec<f64>>,
    cursor: Vec<usize>,
    // cells consumed from the right end (one-way sharing sinks)
    tail_used: Vec<usize>,
    seed: u64,
}

impl RewardTape {
    /// Samples `2 * horizon` cells per arm from the tape stream of `seed`.
    pub fn sample(instance: &BanditInstance, horizon: usize, seed: u64) -> Self {
        Self::sample_stream(instance, horizon, seed, Stream::Tape)
    }

    pub(crate) fn sample_stream(
        instance: &BanditInstance,
        horizon: usize,
        seed: u64,
        stream: Stream,
    ) -> Self {
        assert!(horizon >= 1, "tape horizon must be at least 1");
        let len = 2 * horizon;
        let mut rng = stream_rng(seed, stream);
        let cells = instance
            .arms()
            .iter()
            .map(|dist| (0..len).map(|_| dist.sample(&mut rng)).collect())
            .collect();
        Self {
            cells,
            cursor: vec![0; instance.num_arms()],
            tail_used: vec![0; instance.num_arms()],
            seed,
        }
    }

    /// Tape with explicit cells, e.g. for exhaustive enumeration.
    ///
    /// # Panics
    /// If arms have different lengths or a cell lies outside `[0, 1]`.
    pub fn from_cells(cells: Vec<Vec<f64>>) -> Self {
        let len = cells.first().map_or(0, Vec::len);
        assert!(cells.iter().all(|c| c.len() == len), "ragged tape");
        assert!(
            cells.iter().flatten().all(|x| (0.0..=1.0).contains(x)),
            "tape cell outside [0, 1]"
        );
        let k = cells.len();
        Self {
            cells,
            cursor: vec![0; k],
            tail_used: vec![0; k],
            seed: 0,
        }
    }

    /// Returns the next unread cell of `arm` and advances its cursor.
    ///
    /// # Panics
    /// When the arm's tape is exhausted; runners never pull more than `2T` times.
    pub fn draw(&mut self, arm: usize) -> f64 {
        let pos = self.cursor[arm];
        assert!(
            pos + self.tail_used[arm] < self.cells[arm].len(),
            "reward tape of arm {arm} exhausted"
        );
        self.cursor[arm] += 1;
        self.cells[arm][pos]
    }

    /// Consumes the rightmost unread cell of `arm`.
    pub fn draw_from_end(&mut self, arm: usize) -> f64 {
        let len = self.cells[arm].len();
        assert!(
            self.cursor[arm] + self.tail_used[arm] < len,
            "reward tape of arm {arm} exhausted"
        );
        self.tail_used[arm] += 1;
        self.cells[arm][len - self.tail_used[arm]]
    }

    pub fn cells(&self, arm: usize) -> &[f64] {
        &self.cells[arm]
    }

    pub fn cursor(&self, arm: usize) -> usize {
        self.cursor[arm]
    }

    pub fn cursors(&self) -> &[usize] {
        &self.cursor
    }

    /// Cells consumed on `arm` from either end.
    pub fn consumed(&self, arm: usize) -> usize {
        self.cursor[arm] + self.tail_used[arm]
    }

    pub fn total_consumed(&self) -> usize {
        (0..self.cells.len()).map(|k| self.consumed(k)).sum()
    }

    pub fn len_per_arm(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}
