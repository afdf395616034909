use crate::grid::GridFunction;

/// Maximal run of interior nodes `start..=end` with `|u| <= τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadCoreInterval {
    pub start: usize,
    pub end: usize,
    pub x_start: f64,
    pub x_end: f64,
}

impl DeadCoreInterval {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeadCoreReport {
    pub tau: f64,
    pub intervals: Vec<DeadCoreInterval>,
    /// Node count times `h` (one cell per node).
    pub measure: f64,
}

impl DeadCoreReport {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

pub fn detect_dead_core(u: &GridFunction, tau: f64) -> DeadCoreReport {
    let grid = &u.grid;
    let mut intervals = Vec::new();
    let mut open: Option<usize> = None;
    let range = grid.interior();
    let close = |start: usize, end: usize| DeadCoreInterval {
        start,
        end,
        x_start: grid.x(start),
        x_end: grid.x(end),
    };
    for i in range.clone() {
        let dead = u.values[i].abs() <= tau;
        match (dead, open) {
            (true, None) => open = Some(i),
            (false, Some(st)) => {
                intervals.push(close(st, i - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(st) = open {
        intervals.push(close(st, range.end - 1));
    }
    let measure = intervals.iter().map(|iv| iv.len() as f64).sum::<f64>() * grid.h();
    DeadCoreReport { tau, intervals, measure }
}
