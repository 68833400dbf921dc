use serde::{Deserialize, Serialize};

use crate::mechanics::Color;

/// Grid cell of a [`ValueTable`]: hue index wraps around the colour wheel,
/// saturation index spans `[0, 1]` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub hue: usize,
    pub sat: usize,
}

/// Tabular prediction of harvest points over hue × saturation, learned by
/// nearest-cell supervised updates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    size: usize,
    alpha: f64,
    values: Vec<f64>,
    visits: Vec<u32>,
}

impl ValueTable {
    pub fn new(size: usize, alpha: f64) -> Self {
        assert!(size >= 2, "grid needs at least two cells per axis");
        Self {
            size,
            alpha,
            values: vec![0.0; size * size],
            visits: vec![0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Nearest cell. Hue centres sit at `i / size`, saturation centres at
    /// `j / (size - 1)`.
    pub fn cell(&self, color: Color) -> Cell {
        let n = self.size as f64;
        let hue = (color.hue * n).round() as usize % self.size;
        let sat = ((color.sat * (n - 1.0)).round() as usize).min(self.size - 1);
        Cell { hue, sat }
    }

    fn index(&self, cell: Cell) -> usize {
        cell.hue * self.size + cell.sat
    }

    pub fn query(&self, color: Color) -> f64 {
        self.values[self.index(self.cell(color))]
    }

    pub fn value(&self, cell: Cell) -> f64 {
        self.values[self.index(cell)]
    }

    pub fn visits(&self, cell: Cell) -> u32 {
        self.visits[self.index(cell)]
    }

    /// Moves the nearest cell a step `alpha` toward `target` and returns the
    /// signed change.
    pub fn update(&mut self, color: Color, target: f64) -> f64 {
        let cell = self.cell(color);
        self.update_cell(cell, target)
    }

    pub fn update_cell(&mut self, cell: Cell, target: f64) -> f64 {
        let i = self.index(cell);
        let delta = self.alpha * (target - self.values[i]);
        self.values[i] += delta;
        self.visits[i] += 1;
        delta
    }

    /// Counts an observation of a cell without changing its value.
    pub fn record_visit(&mut self, color: Color) {
        let i = self.index(self.cell(color));
        self.visits[i] += 1;
    }

    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        self.visits.iter_mut().for_each(|v| *v = 0);
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn cells(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        (0..self.size).flat_map(move |hue| {
            (0..self.size).map(move |sat| {
                let cell = Cell { hue, sat };
                (cell, self.value(cell))
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(h: f64, s: f64) -> Color {
        Color::new(h, s).unwrap()
    }

    #[test]
    fn supervised_examples() {
        let mut t = ValueTable::new(12, 0.5);
        assert_eq!(t.query(c(0.3, 0.7)), 0.0);
        assert_eq!(t.update(c(0.5, 0.5), 8.0), 4.0);
        assert_eq!(t.query(c(0.5, 0.5)), 4.0);
        assert_eq!(t.update(c(0.5, 0.5), 8.0), 2.0);
        assert_eq!(t.query(c(0.5, 0.5)), 6.0);
        assert_eq!(t.update(c(0.5, 0.5), 6.0), 0.0);
        // untouched cell
        assert_eq!(t.query(c(0.1, 0.1)), 0.0);
        assert_eq!(t.visits(t.cell(c(0.5, 0.5))), 3);
    }

    #[test]
    fn hue_wraps_to_first_cell() {
        let t = ValueTable::new(12, 0.5);
        assert_eq!(t.cell(c(0.99, 0.0)), Cell { hue: 0, sat: 0 });
        assert_eq!(t.cell(c(0.0, 1.0)), Cell { hue: 0, sat: 11 });
    }

    #[test]
    fn only_touched_cell_changes() {
        let mut t = ValueTable::new(12, 0.5);
        t.update(c(0.25, 0.4), -6.0);
        let touched = t.cell(c(0.25, 0.4));
        for (cell, v) in t.cells() {
            if cell == touched {
                assert_eq!(v, -3.0);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn contraction(target in -10.0f64..10.0, n in 1usize..30, alpha in 0.05f64..1.0) {
            let mut t = ValueTable::new(12, alpha);
            let color = c(0.4, 0.6);
            for _ in 0..n {
                t.update(color, target);
            }
            let expected = (1.0 - alpha).powi(n as i32) * target.abs();
            prop_assert!(((t.query(color) - target).abs() - expected).abs() < 1e-9);
        }
    }
}
