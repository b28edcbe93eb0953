use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("empty analysis window: start {start} is after end {end}")]
    Empty { start: i32, end: i32 },
    #[error("cannot parse window {0:?}, expected START:END")]
    Parse(String),
}

/// Inclusive range of calendar years the time series cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct YearWindow {
    start: i32,
    end: i32,
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    start: i32,
    end: i32,
}

impl TryFrom<WindowRepr> for YearWindow {
    type Error = WindowError;
    fn try_from(r: WindowRepr) -> Result<Self, Self::Error> {
        YearWindow::new(r.start, r.end)
    }
}

impl From<YearWindow> for WindowRepr {
    fn from(w: YearWindow) -> Self {
        WindowRepr {
            start: w.start,
            end: w.end,
        }
    }
}

impl YearWindow {
    pub fn new(start: i32, end: i32) -> Result<Self, WindowError> {
        if start > end {
            return Err(WindowError::Empty { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    pub fn end(&self) -> i32 {
        self.end
    }

    /// Number of years `n` in the window.
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.start && year <= self.end
    }

    /// Position of `year` inside the window, if it falls there.
    pub fn index_of(&self, year: i32) -> Option<usize> {
        self.contains(year).then(|| (year - self.start) as usize)
    }

    pub fn year_at(&self, index: usize) -> i32 {
        self.start + index as i32
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for YearWindow {
    type Err = WindowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| WindowError::Parse(s.to_string()))?;
        let start = a.trim().parse().map_err(|_| WindowError::Parse(s.to_string()))?;
        let end = b.trim().parse().map_err(|_| WindowError::Parse(s.to_string()))?;
        YearWindow::new(start, end)
    }
}
