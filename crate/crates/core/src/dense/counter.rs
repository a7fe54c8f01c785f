/// Running tally of scalar multiplications performed by counted matrix
/// products.
///
/// A counter is single-owner; parallel workers keep their own and combine
/// them with [`MulCounter::merge`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MulCounter {
    count: u64,
}

impl MulCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one `rows x inner` by `inner x cols` product.
    #[inline]
    pub fn record(&mut self, rows: usize, cols: usize, inner: usize) {
        self.count += (rows as u64) * (cols as u64) * (inner as u64);
    }

    pub fn total(&self) -> u64 {
        self.count
    }

    pub fn merge(&mut self, other: &MulCounter) {
        self.count += other.count;
    }

    pub fn reset(&mut self) {
        self.count = 0;
    }
}

/// Records a product on an optional counter.
#[inline]
pub(crate) fn tally(counter: &mut Option<&mut MulCounter>, rows: usize, cols: usize, inner: usize) {
    if let Some(c) = counter.as_deref_mut() {
        c.record(rows, cols, inner);
    }
}
