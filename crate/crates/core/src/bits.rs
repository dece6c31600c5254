//! Fixed-width bit rows stored in one flat buffer.

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitRows {
    words: usize,
    bits: usize,
    data: Vec<u64>,
}

impl BitRows {
    pub(crate) fn new(rows: usize, bits: usize) -> Self {
        let words = bits.div_ceil(64).max(1);
        BitRows {
            words,
            bits,
            data: vec![0; rows * words],
        }
    }

    #[inline]
    pub(crate) fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub(crate) fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [u64] {
        let w = self.words;
        &mut self.data[r * w..(r + 1) * w]
    }

    #[inline]
    pub(crate) fn get(&self, r: usize, b: usize) -> bool {
        (self.data[r * self.words + b / 64] >> (b % 64)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, r: usize, b: usize) {
        self.data[r * self.words + b / 64] |= 1u64 << (b % 64);
    }

    /// Mask of the valid bits in the last word.
    pub(crate) fn tail_mask(&self) -> u64 {
        match self.bits % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }
}

#[inline]
pub(crate) fn popcount(a: &[u64]) -> u32 {
    a.iter().map(|w| w.count_ones()).sum()
}

#[inline]
pub(crate) fn xor_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

pub(crate) fn iter_ones(a: &[u64]) -> impl Iterator<Item = usize> + '_ {
    a.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            }
        })
    })
}
