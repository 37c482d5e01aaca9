use thiserror::Error;

/// Protocol parameters shared by every participant.
///
/// `id_bits` is the width of seeds and pseudonyms, `epoch_seconds` (dt) the
/// broadcast rotation period, `window_epochs` (Δ) the number of epochs a
/// report reveals, and `grid_origin` anchors the global epoch grid. The
/// defaults follow the usual deployment shape: 128-bit ids, 15-minute
/// epochs, a 14-day window, grid aligned to midnight UTC (origin 0 works
/// because the Unix epoch itself starts at midnight UTC).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    id_bits: u32,
    epoch_seconds: u64,
    window_epochs: u64,
    grid_origin: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("id width must be at least 128 bits, got {0}")]
    WidthTooSmall(u32),
    #[error("id width must be a multiple of 8 bits, got {0}")]
    WidthNotByteAligned(u32),
    #[error("epoch duration must be positive")]
    ZeroEpoch,
    #[error("window must span at least one epoch")]
    ZeroWindow,
}

/// One cell of the global epoch grid. Indices are 1-based; the epoch with
/// index `i` covers the half-open interval `[start, start + dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Epoch {
    pub index: u64,
    pub start: u64,
}

impl Params {
    pub fn new(
        id_bits: u32,
        epoch_seconds: u64,
        window_epochs: u64,
        grid_origin: u64,
    ) -> Result<Self, ParamsError> {
        if id_bits < 128 {
            return Err(ParamsError::WidthTooSmall(id_bits));
        }
        if !id_bits.is_multiple_of(8) {
            return Err(ParamsError::WidthNotByteAligned(id_bits));
        }
        if epoch_seconds == 0 {
            return Err(ParamsError::ZeroEpoch);
        }
        if window_epochs == 0 {
            return Err(ParamsError::ZeroWindow);
        }
        Ok(Self {
            id_bits,
            epoch_seconds,
            window_epochs,
            grid_origin,
        })
    }

    pub fn id_bits(&self) -> u32 {
        self.id_bits
    }

    /// Seed and id length in bytes.
    pub fn id_len(&self) -> usize {
        (self.id_bits / 8) as usize
    }

    pub fn epoch_seconds(&self) -> u64 {
        self.epoch_seconds
    }

    pub fn window_epochs(&self) -> u64 {
        self.window_epochs
    }

    pub fn grid_origin(&self) -> u64 {
        self.grid_origin
    }

    /// Δ · dt, the span of broadcasts a report reveals.
    pub fn window_seconds(&self) -> u64 {
        self.window_epochs * self.epoch_seconds
    }

    /// The grid epoch containing `t`. Epochs are half-open, so `t` exactly on
    /// a boundary belongs to the epoch starting there. Times before the grid
    /// origin clamp to the first epoch.
    pub fn epoch_at(&self, t: u64) -> Epoch {
        let offset = t.saturating_sub(self.grid_origin);
        let index = offset / self.epoch_seconds + 1;
        Epoch {
            index,
            start: self.grid_origin + (index - 1) * self.epoch_seconds,
        }
    }

    /// Start time of the epoch with 1-based `index`.
    pub fn epoch_start(&self, index: u64) -> u64 {
        self.grid_origin + index.saturating_sub(1) * self.epoch_seconds
    }
}

impl Default for Params {
    fn default() -> Self {
        Self {
            id_bits: 128,
            epoch_seconds: 900,
            window_epochs: 1344,
            grid_origin: 0,
        }
    }
}
